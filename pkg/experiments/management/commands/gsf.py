from experiments.management.base import BuildCommand


class Command(BuildCommand):
    help = "Solve a Steiner forest instance ('T terminal component' records after the edge list)"
    scheme = 'gsf'
