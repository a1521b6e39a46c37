from rest_framework.exceptions import APIException, ValidationError


class GameError(APIException):
    """Base of every analysis error; `exit_code` is the CLI contract."""
    default_detail = 'Game analysis failed.'
    default_code = 'game_error'
    exit_code = 1


class InvalidProfile(GameError):
    default_detail = 'Strategy profile is not valid for this game.'
    default_code = 'invalid_profile'


class InvalidPlayer(GameError):
    default_detail = 'Player index out of range.'
    default_code = 'invalid_player'


class ArityMismatch(GameError):
    default_detail = 'Joint strategy length does not match the coalition.'
    default_code = 'arity_mismatch'


class InvalidArgument(GameError):
    default_detail = 'Invalid argument.'
    default_code = 'invalid_argument'


class InvalidDistribution(GameError):
    default_detail = 'Distribution over profiles is malformed.'
    default_code = 'invalid_distribution'


class DegenerateGame(GameError):
    default_detail = 'Optimal welfare is zero; ratios are undefined.'
    default_code = 'degenerate_game'


class StateSpaceTooLarge(GameError):
    default_detail = 'State space exceeds the configured cap.'
    default_code = 'state_space_too_large'
    exit_code = 2

    def __init__(self, size, cap, what='profiles'):
        self.size = size
        self.cap = cap
        super().__init__(f"{size} {what} exceed the cap of {cap}")


class RejectedCertificate(GameError):
    default_detail = 'Smoothness certificate does not verify.'
    default_code = 'rejected_certificate'
    exit_code = 4


class UndefinedProperty(GameError):
    default_detail = 'Property is undefined for this game family.'
    default_code = 'undefined_property'
    exit_code = 5


class MissingOutStrategy(UndefinedProperty):
    default_detail = 'Game has no out strategies.'
    default_code = 'missing_out_strategy'


class MissingPotential(UndefinedProperty):
    default_detail = 'Game exposes no potential oracle.'
    default_code = 'missing_potential'


class NotMultisetExtendable(UndefinedProperty):
    default_detail = 'Potential has no occupancy semantics over multisets of strategies.'
    default_code = 'not_multiset_extendable'


class Incomparable(UndefinedProperty):
    default_detail = 'Potential is positive on a zero-welfare profile.'
    default_code = 'incomparable'


class SpecError(ValidationError):
    exit_code = 1

    def __str__(self):
        return '; '.join(f"{path}: {message}" for path, message in flatten_errors(self.detail))


def flatten_errors(detail, prefix=''):
    """Yield (dotted field path, message) pairs from nested serializer errors."""
    if isinstance(detail, dict):
        for key, value in detail.items():
            path = f"{prefix}.{key}" if prefix else str(key)
            yield from flatten_errors(value, path)
    elif isinstance(detail, list):
        if all(not isinstance(item, (dict, list)) for item in detail):
            for item in detail:
                yield prefix or 'non_field_errors', str(item)
        else:
            for index, item in enumerate(detail):
                if item:
                    yield from flatten_errors(item, f"{prefix}.{index}" if prefix else str(index))
    else:
        yield prefix or 'non_field_errors', str(detail)
