aw.takeoff()
aw.fly_to([3, 0, -4])
aw.fly_to([3, 3, -4])
aw.fly_to([0, 3, -4])
aw.fly_to([0, 0, -4])
aw.set_yaw(-90)
p = aw.get_drone_position()
aw.fly_to([p[0], p[1], p[2] - 2])
aw.set_yaw(0)
aw.land()
