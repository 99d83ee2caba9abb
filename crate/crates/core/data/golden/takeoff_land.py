aw.takeoff()
p = aw.get_drone_position()
aw.fly_to([p[0] + 2, p[1], p[2]])
aw.land()
