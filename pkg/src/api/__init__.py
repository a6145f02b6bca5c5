"""Pipeline facade and command-line frontend"""
