# Numeric (floating-point) tools package
