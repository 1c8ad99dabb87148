"""Prompting LLMs with passive-sensing feature windows and checking what they say."""

__version__ = "0.1.0"
