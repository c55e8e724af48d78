"""Tests for the two-level laser toolkit."""
