current_position = aw.get_drone_position()
aw.fly_to([current_position[0], current_position[1], current_position[2] - 10])
