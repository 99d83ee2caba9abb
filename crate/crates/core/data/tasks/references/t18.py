aw.takeoff()
for level in range(8):
    p = aw.get_drone_position()
    aw.fly_to([p[0], p[1], p[2] - 1])
    aw.set_yaw(aw.get_yaw() + 60)
p = aw.get_drone_position()
aw.fly_to([p[0], p[1], p[2] + 8])
aw.land()
