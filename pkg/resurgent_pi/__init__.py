from .resurgent_pi import ResurgentPI
from .utils import utils
