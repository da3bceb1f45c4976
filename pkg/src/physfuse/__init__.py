"""physfuse: rigid-body geometry and inertia reconstruction that fuses
partial depth observations with contact-implicit learning from pose
trajectories."""

__version__ = "0.1.0"
