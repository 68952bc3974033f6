"""Test fixtures and helpers"""
