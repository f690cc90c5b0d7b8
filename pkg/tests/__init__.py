"""Tests for liouform."""
