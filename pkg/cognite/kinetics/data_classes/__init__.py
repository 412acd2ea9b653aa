from cognite.kinetics.data_classes._base import *
from cognite.kinetics.data_classes.analysis import *
from cognite.kinetics.data_classes.discretization import *
from cognite.kinetics.data_classes.experiments import *
from cognite.kinetics.data_classes.kernels import *
from cognite.kinetics.data_classes.kinematics import *
from cognite.kinetics.data_classes.modes import *
from cognite.kinetics.data_classes.moments import *
from cognite.kinetics.data_classes.nonlinear import *
from cognite.kinetics.data_classes.semigroup import *
