# Rational helpers, check ledger and report writer
