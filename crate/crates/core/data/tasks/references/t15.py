aw.takeoff()
p = aw.get_drone_position()
aw.fly_to([p[0], p[1], p[2] - 2])
center = aw.get_drone_position()
aw.fly_to([center[0] + 3, center[1], center[2]])
aw.fly_to(center)
aw.fly_to([center[0], center[1] + 3, center[2]])
aw.fly_to(center)
aw.fly_to([center[0] - 3, center[1], center[2]])
aw.fly_to(center)
aw.fly_to([center[0], center[1] - 3, center[2]])
aw.fly_to(center)
aw.set_yaw(-90)
aw.land()
