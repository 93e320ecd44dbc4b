points = [(-1.5, 0.0), (1.5, 0.0)]
r = 1.0
body = "empty"
body_volumes = (0.0, 0.0)
hull = "empty"
hull_volumes = (0.0, 0.0)
