aw.takeoff()
p = aw.get_drone_position()
aw.fly_to([p[0], p[1], p[2] - 2])
for i in range(2):
    p = aw.get_drone_position()
    aw.fly_to([p[0] + 8, p[1], p[2]])
    p = aw.get_drone_position()
    aw.fly_to([p[0], p[1] + 2, p[2]])
    p = aw.get_drone_position()
    aw.fly_to([p[0] - 8, p[1], p[2]])
    p = aw.get_drone_position()
    aw.fly_to([p[0], p[1] + 2, p[2]])
p = aw.get_drone_position()
aw.fly_to([p[0], p[1], p[2] - 3])
aw.set_yaw(90)
aw.land()
