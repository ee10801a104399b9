# Semantic role labeling
