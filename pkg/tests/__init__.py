"""Tests for orientlam."""
