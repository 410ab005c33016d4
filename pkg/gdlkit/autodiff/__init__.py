from gdlkit.autodiff.tensor import Tensor, Variable, as_tensor, constant, zero_grads
from gdlkit.autodiff.tape import Tape, backward
from gdlkit.autodiff.gradcheck import check_gradients, numerical_gradient
