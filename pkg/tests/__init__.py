"""Tests for the afbench package."""
