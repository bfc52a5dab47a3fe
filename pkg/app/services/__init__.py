"""
Services package: branching-program operations, extractors, generators,
the simulator, GIP derandomization and experiments
"""
