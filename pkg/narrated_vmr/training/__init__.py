"""
Label expansion, losses, the optimization loop and the synthetic dataset builder.
"""
