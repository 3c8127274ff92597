# Generated by Django 4.2 on 2026-10-18 09:00

import uuid
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('kind', models.CharField(choices=[('istoy', 'Importance sampling toy'), ('popmcmc', 'Population MCMC'), ('smc-sampler', 'SMC sampler'), ('pfilter', 'Particle filter'), ('bench', 'Benchmark'), ('gendata', 'Data generation'), ('compare-precision', 'Precision comparison')], max_length=20)),
                ('status', models.CharField(choices=[('REQUESTED', 'Requested'), ('RUNNING', 'Running'), ('COMPLETED', 'Completed'), ('FAILED', 'Failed')], default='REQUESTED', max_length=20)),
                ('config', models.JSONField(default=dict)),
                ('config_hash', models.CharField(db_index=True, max_length=64)),
                ('seed', models.BigIntegerField(default=0)),
                ('workers', models.IntegerField(default=1)),
                ('precision', models.CharField(choices=[('single', 'Single'), ('double', 'Double')], default='double', max_length=6)),
                ('generator', models.CharField(default='mrg32k3a', max_length=20)),
                ('out_dir', models.CharField(blank=True, max_length=500)),
                ('wall_clock_seconds', models.FloatField(blank=True, null=True)),
                ('exit_code', models.IntegerField(blank=True, null=True)),
                ('error', models.TextField(blank=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('started_at', models.DateTimeField(blank=True, null=True)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
    ]
