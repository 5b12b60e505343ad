"""Desk-scale cross-view world model lab.

A walled-arena simulator rendered from four synchronized viewpoints, an
action-conditioned diffusion transformer trained to predict future frames
in the same or a different viewpoint, the evaluation protocols that probe
the resulting spatial grounding (marker localization, trajectory
consistency, spawn-anywhere), and an interactive steer-and-imagine
service.
"""

__version__ = "0.1.0"
