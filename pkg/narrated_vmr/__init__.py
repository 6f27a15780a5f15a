"""
Narrative-enhanced video moment retrieval: MLLM frame narratives aligned to snippet features.
"""

__version__ = "0.3.0"
