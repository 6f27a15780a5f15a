"""
Temporal IoU metrics, split evaluation, result tables and the alpha sweep.
"""
