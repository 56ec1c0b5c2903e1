from experiments.management.base import BuildCommand


class Command(BuildCommand):
    help = 'Build routing tables, tight labels, sketches, a diameter estimate or a Steiner forest'
