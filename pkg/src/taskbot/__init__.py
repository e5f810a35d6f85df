"""Schema-driven task-bot factory: compile dialog flows and task databases
into annotated simulated corpora, host dialog models, evaluate them, and
refine them through machine teaching."""

__version__ = "0.1.0"
