"""Package-wide numeric tolerance.

Read as ``config.TOLERANCE`` at call time so that rebinding it affects every
validation check.
"""

TOLERANCE = 1e-9
