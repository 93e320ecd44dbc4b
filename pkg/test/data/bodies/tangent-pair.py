import math

points = [(-2.0, 0.0), (2.0, 0.0)]
r = 2.0
body = "point"
body_volumes = (0.0, 0.0)
hull = "region"
hull_volumes = (2 * math.pi, 4 * math.pi)
