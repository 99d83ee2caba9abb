aw.takeoff()
p = aw.get_drone_position()
aw.fly_to([p[0], p[1], p[2] - 2])
p = aw.get_drone_position()
aw.fly_to([p[0] + 6, p[1], p[2]])
aw.set_yaw(90)
p = aw.get_drone_position()
aw.fly_to([p[0], p[1] + 6, p[2]])
aw.set_yaw(-135)
p = aw.get_drone_position()
aw.fly_to([p[0] - 6, p[1] - 6, p[2]])
p = aw.get_drone_position()
aw.fly_to([p[0], p[1], p[2] + 1])
aw.land()
