from gdlkit.layers.base_layer import BaseLayer, Parameter, layer_factory, layer_registry
from gdlkit.layers.affine import AffineLayer, affine_forward
from gdlkit.layers.activations import Activation, ActivationKind, activate, spike_function
from gdlkit.layers.conv import ChannelStack, Conv1dSpec, Conv2dSpec, IndexMap, conv1d_forward, conv2d_forward
from gdlkit.layers.pool import PoolKind, PoolSpec, pool_forward
from gdlkit.layers.model import Model, cnn, linear_classifier, mlp, model_forward
