# Scoring and report emission
