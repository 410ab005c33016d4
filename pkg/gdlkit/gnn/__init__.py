from gdlkit.gnn.message_passing import MessagePassingLayer, MPVariant, mp_forward, propagation_matrix
from gdlkit.gnn.gat import AttentionCoefficients, GatLayer, gat_attention, gat_forward
from gdlkit.gnn.encoder_decoder import EncoderDecoder, gnn_score, predict_labels
