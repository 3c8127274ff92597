# montecarlo/serializers.py
"""
Experiment configuration serializers.

Each experiment kind validates its merged configuration (defaults, then the
key = value config file, then command-line flags) through one of these.
Defaults are the standard experiment sizes: k=4 means with sigma 0.55, 200 chains or
temperatures, 8192 samples or particles, a 5x3 FSV model.
"""
import psutil
from django.conf import settings
from rest_framework import serializers

from .exceptions import ConfigurationError
from .models import ExperimentRun
from .prng import GENERATORS
from .smc import RESAMPLERS
from .targets import FsvParams, TRUE_MEANS


def engine_default(key):
    return lambda: settings.MONTECARLO[key]


def default_bench_workers():
    cores = psutil.cpu_count(logical=False) or psutil.cpu_count() or 1
    return sorted({1, 2, max(2, cores)})


class EngineConfigSerializer(serializers.Serializer):
    seed = serializers.IntegerField(min_value=0, default=engine_default('SEED'))
    workers = serializers.IntegerField(min_value=1, default=engine_default('WORKERS'))
    precision = serializers.ChoiceField(choices=['single', 'double'], default=engine_default('PRECISION'))
    generator = serializers.ChoiceField(choices=list(GENERATORS), default=engine_default('GENERATOR'))
    block_length = serializers.IntegerField(min_value=1, default=engine_default('BLOCK_LENGTH'))
    out_dir = serializers.CharField(required=False, allow_blank=False)
    out = serializers.CharField(required=False, help_text='Extra copy of the main result CSV')


class MixtureConfigMixin(serializers.Serializer):
    k = serializers.IntegerField(min_value=1, default=4)
    sigma = serializers.FloatField(min_value=0.0, default=0.55)
    observations = serializers.IntegerField(min_value=1, default=100)
    true_means = serializers.ListField(child=serializers.FloatField(), min_length=1,
                                       default=lambda: list(TRUE_MEANS))
    bound = serializers.FloatField(default=10.0)
    data = serializers.CharField(required=False, help_text='Mixture observations CSV; generated when omitted')
    data_seed = serializers.IntegerField(min_value=0, default=1)
    capture_radius = serializers.FloatField(default=1.0)

    def validate(self, attrs):
        attrs = super().validate(attrs)
        if attrs['sigma'] <= 0:
            raise serializers.ValidationError({'sigma': 'Must be positive.'})
        if attrs['bound'] <= 0:
            raise serializers.ValidationError({'bound': 'Must be positive.'})
        if len(attrs['true_means']) != attrs['k']:
            raise serializers.ValidationError({'true_means': f"Expected {attrs['k']} values."})
        return attrs


class IsToyConfigSerializer(EngineConfigSerializer):
    samples = serializers.IntegerField(min_value=1, default=2 ** 24)
    threads = serializers.IntegerField(min_value=1, default=4096)


class PopMcmcConfigSerializer(MixtureConfigMixin, EngineConfigSerializer):
    chains = serializers.IntegerField(min_value=1, default=200)
    iterations = serializers.IntegerField(min_value=1, default=8192)
    burn_in = serializers.IntegerField(min_value=0, default=0)
    rwm_scale = serializers.FloatField(default=1.0)
    trace = serializers.CharField(required=False, help_text='Extra copy of the exchange trace CSV')
    dump_all_chains = serializers.BooleanField(default=False)
    kde = serializers.BooleanField(default=True)

    def validate_rwm_scale(self, value):
        if value <= 0:
            raise serializers.ValidationError('Must be positive.')
        return value


class SmcSamplerConfigSerializer(MixtureConfigMixin, EngineConfigSerializer):
    particles = serializers.IntegerField(min_value=2, default=8192)
    temperatures = serializers.IntegerField(min_value=1, default=200)
    mcmc_steps = serializers.IntegerField(min_value=0, default=10)
    ess_threshold = serializers.FloatField(min_value=0.0, max_value=1.0, default=0.5)
    resampler = serializers.ChoiceField(choices=list(RESAMPLERS), default='multinomial')
    rwm_scale = serializers.FloatField(default=1.0)
    kde = serializers.BooleanField(default=True)


class SsmConfigMixin(serializers.Serializer):
    model = serializers.ChoiceField(choices=['fsv', 'linear-gaussian'], default='fsv')
    steps = serializers.IntegerField(min_value=1, default=200, help_text='Time steps T when simulating')
    data = serializers.CharField(required=False, help_text='Observations CSV; simulated when omitted')
    data_seed = serializers.IntegerField(min_value=0, default=1)
    # factor stochastic volatility
    obs_dim = serializers.IntegerField(min_value=1, default=5)
    factor_dim = serializers.IntegerField(min_value=1, default=3)
    psi = serializers.FloatField(default=0.5)
    phi = serializers.FloatField(default=0.9)
    x0 = serializers.FloatField(default=0.0)
    B = serializers.ListField(child=serializers.ListField(child=serializers.FloatField()), required=False)
    U = serializers.ListField(child=serializers.ListField(child=serializers.FloatField()), required=False)
    # linear-Gaussian surrogate
    a = serializers.FloatField(default=0.9)
    q = serializers.FloatField(default=1.0)
    r = serializers.FloatField(default=1.0)

    def validate(self, attrs):
        attrs = super().validate(attrs)
        if attrs['model'] == 'fsv':
            try:
                params = FsvParams.default(
                    obs_dim=attrs['obs_dim'], factor_dim=attrs['factor_dim'], psi=attrs['psi'],
                    phi=attrs['phi'], x0=attrs['x0'], B=attrs.get('B'), U=attrs.get('U'),
                )
            except (ConfigurationError, ValueError) as exc:
                raise serializers.ValidationError({'model': str(exc)})
            if params.obs_dim != attrs['obs_dim'] or params.factor_dim != attrs['factor_dim']:
                raise serializers.ValidationError({'B': 'Shape does not match obs_dim x factor_dim.'})
        elif attrs['q'] < 0 or attrs['r'] <= 0:
            raise serializers.ValidationError({'r': 'Need q >= 0 and r > 0.'})
        return attrs


class PfilterConfigSerializer(SsmConfigMixin, EngineConfigSerializer):
    particles = serializers.IntegerField(min_value=2, default=8192)
    ess_threshold = serializers.FloatField(min_value=0.0, max_value=1.0, default=0.5)
    resampler = serializers.ChoiceField(choices=list(RESAMPLERS), default='multinomial')


class GendataConfigSerializer(MixtureConfigMixin, SsmConfigMixin, EngineConfigSerializer):
    model = serializers.ChoiceField(choices=['mixture', 'fsv', 'linear-gaussian'], default='mixture')

    def validate(self, attrs):
        if attrs['model'] == 'mixture':
            return MixtureConfigMixin.validate(self, attrs)
        return SsmConfigMixin.validate(self, attrs)


class BenchConfigSerializer(EngineConfigSerializer):
    workers_list = serializers.ListField(
        child=serializers.IntegerField(min_value=1), min_length=2, default=default_bench_workers
    )
    repetitions = serializers.IntegerField(min_value=3, default=3)
    experiments = serializers.ListField(
        child=serializers.ChoiceField(choices=['popmcmc', 'smc-sampler', 'pfilter']),
        min_length=1, default=lambda: ['popmcmc', 'smc-sampler', 'pfilter'],
    )
    chain_sizes = serializers.ListField(child=serializers.IntegerField(min_value=1),
                                        default=lambda: [256, 512, 1024, 2048])
    popmcmc_iterations = serializers.IntegerField(min_value=1, default=100)
    particle_sizes = serializers.ListField(child=serializers.IntegerField(min_value=2),
                                           default=lambda: [2048, 4096, 8192, 16384])
    smc_temperatures = serializers.IntegerField(min_value=1, default=20)
    smc_mcmc_steps = serializers.IntegerField(min_value=0, default=2)
    filter_sizes = serializers.ListField(child=serializers.IntegerField(min_value=2),
                                         default=lambda: [8192, 16384, 32768, 65536])
    filter_steps = serializers.IntegerField(min_value=1, default=50)


class ComparePrecisionConfigSerializer(EngineConfigSerializer):
    experiments = serializers.ListField(
        child=serializers.ChoiceField(choices=['istoy', 'smc-sampler', 'pfilter']),
        min_length=1, default=lambda: ['istoy', 'smc-sampler', 'pfilter'],
    )
    samples = serializers.IntegerField(min_value=1, default=2 ** 24)
    threads = serializers.IntegerField(min_value=1, default=4096)
    particles = serializers.IntegerField(min_value=2, default=8192)
    temperatures = serializers.IntegerField(min_value=1, default=200)
    mcmc_steps = serializers.IntegerField(min_value=0, default=10)
    filter_particles = serializers.IntegerField(min_value=2, default=8192)
    data_seed = serializers.IntegerField(min_value=0, default=1)


CONFIG_SERIALIZERS = {
    'istoy': IsToyConfigSerializer,
    'popmcmc': PopMcmcConfigSerializer,
    'smc-sampler': SmcSamplerConfigSerializer,
    'pfilter': PfilterConfigSerializer,
    'gendata': GendataConfigSerializer,
    'bench': BenchConfigSerializer,
    'compare-precision': ComparePrecisionConfigSerializer,
}


class ExperimentRunSerializer(serializers.ModelSerializer):
    class Meta:
        model = ExperimentRun
        fields = '__all__'
        read_only_fields = (
            'id', 'status', 'created_at', 'started_at', 'finished_at',
            'wall_clock_seconds', 'exit_code', 'error',
        )
