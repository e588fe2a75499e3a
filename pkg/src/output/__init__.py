"""
Output module for trace CSVs and experiment summaries.
"""
