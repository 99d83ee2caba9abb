aw.takeoff()
for i in range(4):
    p = aw.get_drone_position()
    aw.fly_to([p[0] + 2, p[1], p[2]])
    p = aw.get_drone_position()
    aw.fly_to([p[0], p[1] + 2, p[2]])
    p = aw.get_drone_position()
    aw.fly_to([p[0], p[1], p[2] - 1])
    aw.set_yaw(aw.get_yaw() + 90)
