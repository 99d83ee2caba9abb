aw.takeoff()
aw.fly_to([0, 0, -10])
aw.fly_to([8, 8, -10])
aw.set_yaw(45)
aw.fly_to([8, 0, -10])
aw.fly_to([0, 0, -10])
p = aw.get_drone_position()
aw.fly_to([p[0], p[1], p[2] + 5])
aw.land()
