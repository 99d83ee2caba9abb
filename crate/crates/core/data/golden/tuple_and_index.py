aw.takeoff()
x, y, z = aw.get_drone_position()
target = [x, y, z]
target[0] = target[0] - 4
target[1] = target[1] + 3
aw.fly_to(target)
