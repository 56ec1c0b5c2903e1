# Generated by Django 5.2.7 on 2026-10-17 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('source', models.CharField(max_length=255, verbose_name='Graph source')),
                ('scheme', models.CharField(max_length=20, verbose_name='Scheme')),
                ('n', models.PositiveIntegerField(blank=True, null=True, verbose_name='Nodes')),
                ('HD', models.PositiveIntegerField(blank=True, null=True, verbose_name='Hop diameter')),
                ('WD', models.PositiveBigIntegerField(blank=True, null=True, verbose_name='Weighted diameter')),
                ('alpha', models.CharField(blank=True, max_length=20, null=True, verbose_name='Alpha')),
                ('k', models.PositiveIntegerField(blank=True, null=True, verbose_name='k')),
                ('L', models.PositiveIntegerField(blank=True, null=True, verbose_name='Stages')),
                ('seed', models.PositiveIntegerField(blank=True, null=True, verbose_name='Seed')),
                ('rounds', models.PositiveBigIntegerField(blank=True, null=True, verbose_name='Rounds')),
                ('messages', models.PositiveBigIntegerField(blank=True, null=True, verbose_name='Messages')),
                ('retries', models.PositiveIntegerField(blank=True, null=True, verbose_name='Retries')),
                ('max_stretch', models.FloatField(blank=True, null=True, verbose_name='Max stretch')),
                ('mean_stretch', models.FloatField(blank=True, null=True, verbose_name='Mean stretch')),
                ('max_table_bits', models.PositiveBigIntegerField(blank=True, null=True, verbose_name='Max table bits')),
                ('label_bits', models.PositiveBigIntegerField(blank=True, null=True, verbose_name='Label bits')),
                ('status', models.CharField(choices=[('ok', 'Validated'), ('violated', 'Bound violated'), ('failed', 'Failed')], default='ok', max_length=10, verbose_name='Status')),
                ('detail', models.TextField(blank=True, verbose_name='Detail')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'verbose_name': 'Experiment Run',
                'verbose_name_plural': 'Experiment Runs',
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['scheme', 'status'], name='experiments_scheme_status_idx')],
            },
        ),
    ]
