aw.takeoff()
for row in range(2):
    for step in range(3):
        p = aw.get_drone_position()
        aw.fly_to([p[0] + 1, p[1], p[2]])
    p = aw.get_drone_position()
    aw.fly_to([p[0], p[1] + 2, p[2]])
aw.land()
