"""HexHeight: Bernoulli local heights on abelian surfaces"""
