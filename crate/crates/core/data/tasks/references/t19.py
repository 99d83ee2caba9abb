aw.takeoff()
p = aw.get_drone_position()
aw.fly_to([p[0], p[1], p[2] - 2])
for row in range(3):
    aw.set_yaw(90)
    p = aw.get_drone_position()
    aw.fly_to([p[0], p[1] + 6, p[2]])
    aw.set_yaw(0)
    p = aw.get_drone_position()
    aw.fly_to([p[0] + 2, p[1], p[2]])
aw.set_yaw(180)
aw.land()
