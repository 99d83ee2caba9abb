aw.takeoff()
for i in range(4):
    aw.set_yaw(aw.get_yaw() + 45)
aw.land()
