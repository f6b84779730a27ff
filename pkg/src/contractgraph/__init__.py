"""Contract knowledge-graph toolkit: clause-level extraction minigraphs are
merged into whole-contract graphs, measured by a linter metric suite, and
scored for reinforcement-style training with a gated reward schedule."""

__version__ = "0.1.0"
