aw.takeoff()
aw.fly_to([10, 0, -5])
aw.fly_to([10, -4, -5])
aw.land()
