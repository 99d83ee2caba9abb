aw.takeoff()
p = aw.get_drone_position()
aw.fly_to([p[0] - 6, p[1], p[2]])
aw.set_yaw(180)
p = aw.get_drone_position()
aw.fly_to([p[0], p[1], p[2] - 2])
p = aw.get_drone_position()
aw.fly_to([p[0], p[1] - 3, p[2]])
aw.set_yaw(0)
aw.land()
