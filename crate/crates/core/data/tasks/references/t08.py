aw.takeoff()
for i in range(3):
    p = aw.get_drone_position()
    aw.fly_to([p[0] + 2, p[1], p[2]])
    p = aw.get_drone_position()
    aw.fly_to([p[0], p[1], p[2] - 1])
aw.set_yaw(180)
p = aw.get_drone_position()
aw.fly_to([p[0] - 6, p[1], p[2]])
aw.land()
