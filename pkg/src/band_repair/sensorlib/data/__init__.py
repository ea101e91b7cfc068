"""Bundled sensor data (sensor_specs.json: Gaussian band centers and widths per sensor)."""
