aw.takeoff()
p = aw.get_drone_position()
aw.fly_to([p[0], p[1], p[2] - 4])
for k in range(5):
    aw.fly_to([2 * (k + 1), 2 * ((k + 1) % 2), -6.5])
    aw.set_yaw(90 * k)
aw.fly_to([0, 0, -6.5])
aw.land()
