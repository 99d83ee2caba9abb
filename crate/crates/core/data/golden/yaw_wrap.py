aw.takeoff()
aw.set_yaw(270)
aw.set_yaw(-170)
aw.set_yaw(170)
