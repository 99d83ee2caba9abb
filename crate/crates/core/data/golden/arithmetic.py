aw.takeoff()
side = 3
half = side / 2
p = aw.get_drone_position()
aw.fly_to([p[0] + side * 2, p[1] - half, p[2] - 2 ** 2])
aw.set_yaw(aw.get_yaw() - 45)
