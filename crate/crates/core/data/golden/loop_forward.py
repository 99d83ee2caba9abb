aw.takeoff()
for i in range(4):
    p = aw.get_drone_position()
    aw.fly_to([p[0] + 2, p[1], p[2]])
