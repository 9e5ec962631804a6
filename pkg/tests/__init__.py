"""Test suite for voice generation library."""
