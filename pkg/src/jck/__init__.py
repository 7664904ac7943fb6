"""Toolkit for a multi-agent justification logic with common knowledge.

Checks Hilbert-style derivations against a small kernel, synthesizes evidence
terms and derivations for the internalization lemmas, evaluates formulas in
finite evidence models, translates to and from the corresponding multi-agent
modal language, and reproduces a coordinated-attack analysis end to end.
"""

__version__ = "0.1.0"
