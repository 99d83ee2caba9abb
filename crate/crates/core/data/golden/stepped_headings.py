import math

# headings 0, 120, 240, then face south
aw.takeoff()
for k in range(0, 360, 120):
    aw.set_yaw(k)
aw.set_yaw(-180)
