aw.takeoff()
p = aw.get_drone_position()
aw.fly_to([p[0], p[1], p[2] - 1])
aw.set_yaw(90)
p = aw.get_drone_position()
aw.fly_to([p[0], p[1] + 6, p[2]])
aw.set_yaw(180)
p = aw.get_drone_position()
aw.fly_to([p[0] - 3, p[1], p[2]])
aw.set_yaw(-90)
p = aw.get_drone_position()
aw.fly_to([p[0], p[1] - 6, p[2]])
aw.set_yaw(0)
p = aw.get_drone_position()
aw.fly_to([p[0] + 3, p[1], p[2]])
p = aw.get_drone_position()
aw.fly_to([p[0], p[1], p[2] + 1])
aw.set_yaw(180)
aw.land()
