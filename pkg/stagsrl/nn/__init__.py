# Embeddings, char CNN and (highway) BiLSTM layers
