# Dependency supertags for semantic role labeling
