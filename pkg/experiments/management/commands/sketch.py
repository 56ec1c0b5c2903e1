from experiments.management.base import BuildCommand


class Command(BuildCommand):
    help = 'Build distance sketches (--k) and check all-pairs estimates'
    scheme = 'sketch'
