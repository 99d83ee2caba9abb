aw.takeoff()
p = aw.get_drone_position()
aw.fly_to([p[0], p[1], p[2] - 3])
p = aw.get_drone_position()
aw.fly_to([p[0] + 4, p[1], p[2]])
aw.set_yaw(90)
p = aw.get_drone_position()
aw.fly_to([p[0], p[1] + 4, p[2]])
aw.land()
