"""AIOps assistant workbench: ReAct agent, simulated cluster, benchmark harness."""

__version__ = "0.1.0"
