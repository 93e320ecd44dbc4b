import math

points = [(0.0, 0.0), (0.25, 0.0)]
r = 0.25
body = "region"
body_volumes = (0.25 * 2 * math.pi / 3, 0.0625 * (2 * math.pi / 3 - math.sqrt(3) / 2))
hull = "region"
hull_volumes = (0.25 * math.pi / 3, 0.0625 * (math.pi / 3 - math.sqrt(3) / 2))
