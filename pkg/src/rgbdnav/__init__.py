"""RGB-D camera and 2D LiDAR costmap navigation simulator."""

__version__ = "0.1.0"
