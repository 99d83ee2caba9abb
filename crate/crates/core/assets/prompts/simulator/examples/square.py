aw.takeoff()
current_position = aw.get_drone_position()
aw.fly_to([current_position[0], current_position[1], current_position[2] - 5])
current_position = aw.get_drone_position()
aw.set_yaw(90)
aw.fly_to([current_position[0] + 5, current_position[1], current_position[2]])
current_position = aw.get_drone_position()
current_yaw = get_yaw()
aw.set_yaw(90 + current_yaw)
aw.fly_to([current_position[0], current_position[1] + 5, current_position[2]])
current_position = aw.get_drone_position()
current_yaw = get_yaw()
aw.set_yaw(90 + current_yaw)
aw.fly_to([current_position[0] - 5, current_position[1], current_position[2]])
current_position = aw.get_drone_position()
current_yaw = get_yaw()
aw.set_yaw(90 + current_yaw)
aw.fly_to([current_position[0], current_position[1] - 5, current_position[2]])
