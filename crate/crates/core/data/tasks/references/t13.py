aw.takeoff()
for i in range(4):
    p = aw.get_drone_position()
    aw.fly_to([p[0] + 3, p[1], p[2]])
    aw.set_yaw(aw.get_yaw() + 90)
    p = aw.get_drone_position()
    aw.fly_to([p[0], p[1] + 1, p[2]])
aw.land()
