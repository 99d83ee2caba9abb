aw.takeoff()
for i in range(3):
    p = aw.get_drone_position()
    aw.fly_to([p[0] + 5, p[1], p[2]])
    p = aw.get_drone_position()
    aw.fly_to([p[0] - 5, p[1], p[2]])
aw.land()
