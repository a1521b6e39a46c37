from django.db import models

CHECK_FAILED = 3


class OutputFormat(models.TextChoices):
    JSON = 'json', 'JSON document'
    CSV = 'csv', 'CSV table'


class Anchor(models.TextChoices):
    OPT = 'opt', 'Optimal profile'
    SEARCH = 'search', 'Best over all profiles'


# Flag name -> setting it overrides for one invocation
CAP_SETTINGS = {
    'profile_cap': 'PROFILE_CAP',
    'permutation_cap': 'PERMUTATION_CAP',
    'chain_cap': 'CHAIN_STATE_CAP',
}
