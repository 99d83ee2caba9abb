aw.takeoff()
for i in range(5):
    aw.set_yaw(aw.get_yaw() + 72)
    p = aw.get_drone_position()
    aw.fly_to([p[0], p[1], p[2] - 1])
