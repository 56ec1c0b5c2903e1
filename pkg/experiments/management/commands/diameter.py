from experiments.management.base import BuildCommand


class Command(BuildCommand):
    help = 'Estimate the weighted diameter within a factor 2k + 1'
    scheme = 'diameter'
