aw.takeoff()
p = aw.get_drone_position()
aw.fly_to([p[0], p[1], p[2] - 5])
aw.set_yaw(0)
p = aw.get_drone_position()
aw.fly_to([p[0] + 10, p[1], p[2]])
aw.set_yaw(90)
p = aw.get_drone_position()
aw.fly_to([p[0], p[1] + 10, p[2]])
aw.set_yaw(180)
p = aw.get_drone_position()
aw.fly_to([p[0] - 10, p[1], p[2]])
aw.set_yaw(-90)
p = aw.get_drone_position()
aw.fly_to([p[0], p[1] - 10, p[2]])
p = aw.get_drone_position()
aw.fly_to([p[0], p[1], p[2] + 2])
p = aw.get_drone_position()
aw.fly_to([p[0], p[1] + 5, p[2]])
p = aw.get_drone_position()
aw.fly_to([p[0] + 5, p[1], p[2]])
p = aw.get_drone_position()
aw.fly_to([p[0], p[1] - 5, p[2]])
p = aw.get_drone_position()
aw.fly_to([p[0] - 5, p[1], p[2]])
aw.set_yaw(0)
aw.land()
