# Sequence taggers, optimizer and checkpoints
