# Exact rational tools package
