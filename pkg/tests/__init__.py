"""Tests for ore-xccy-curve package."""