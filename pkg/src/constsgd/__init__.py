"""Constant step-size SGD and averaged SGD in high dimension."""
