// Apache License, Version 2.0, refer to LICENSE.txt
//
// Frozen two-sample t-test references, computed independently with
// scipy.stats.ttest_ind(a, b, equal_var=False) before the implementation
// existed. Each row: sample a, sample b, Welch statistic, two-sided p.

#pragma once

#include <vector>

struct WelchReference {
  std::vector<double> a;
  std::vector<double> b;
  double t;
  double p;
};

inline const std::vector<WelchReference>& welch_references() {
  static const std::vector<WelchReference> refs = {
      {{1, 2, 3, 4, 5}, {2, 3, 4, 5, 6}, -1.0, 0.34659350708733416},
      {{10.0, 10.1, 9.9, 10.05, 9.95},
       {10.4, 10.5, 10.3, 10.45, 10.6, 10.35},
       -7.666981720054666,
       3.307182430028152e-05},
      {{0.5, 0.7}, {0.6, 0.9, 1.1}, -1.5118578920369092, 0.22781310222334575},
      {{92.54, 92.6, 92.49, 92.55, 92.47},
       {92.76, 92.81, 92.7, 92.66, 92.85},
       -5.42417357633174,
       0.0010079669616624006},
      {{80.48, 80.39, 80.55, 80.6, 80.44},
       {85.38, 85.2, 85.55, 85.41, 85.29},
       -69.77110703614672,
       5.806856727448178e-11},
      {{-1.3553, -3.1276, -10.7726, -9.5459, -4.9464, 1.313, -3.4708, -4.0843},
       {0.4818, 0.9215, 6.4719, 6.1942, 4.6118, -1.0992, -0.4943, 0.0054},
       -3.7078810034757383,
       0.0025684236792259184},
      {{0.5554, -2.2315, 2.6031, 0.856, -1.3197, -2.441, -4.9493, -0.3646, -4.2085, 0.547},
       {-0.0224, 5.5191, 3.2213, 5.2863, 3.2585, 4.6253, 5.4168, 4.7515, 5.3617, 6.9539},
       -5.724352236052469,
       2.3751519843754496e-05},
      {{-1.6439, -0.3022, 0.1993, -0.2937, -1.3137, 0.8524, 0.1132, 0.193, 1.7709, -0.2241},
       {3.1794, 0.1716, 5.013, 1.521, 6.3991, 3.8135, 4.4936, 3.8153, 0.7713},
       -4.399589617728899,
       0.001027399384335647},
      {{2.1683, -0.1701, 2.8098, 0.7424, 2.4967, 2.9146, 1.0621},
       {1.7568, 2.4201, 1.427, 1.6833, 0.913, 1.809, 2.5718, 2.5522, 1.6064, 2.8981},
       -0.5044284484992593,
       0.6270303027841666},
      {{0.6121, -3.4411, 0.543},
       {2.5987, 3.506, 2.7321, 4.7308, 4.746, 3.3036, 3.4592, 4.3676, 4.3625, 4.8004},
       -3.384191287224957,
       0.06939527078815756},
      {{4.0122, 2.8733, 8.7578, 5.2439, 11.0177, 3.3706, 5.0755, 6.8929, 5.7192},
       {1.4486, -0.2733, 0.5347, 0.3881, 1.9542, 0.8392, 0.4054, 3.9593, 2.6189, -1.7123},
       4.8167517514314495,
       0.0003506348136636985},
      {{-3.364, 0.5343}, {-4.0978, -4.2247}, 1.408278485300002, 0.3927334483732183},
      {{-1.0967, -0.4851, -1.4962, -1.2147, -1.3852, -1.0845, -1.7935, -1.2778, -2.1102,
        -1.5201},
       {0.8376, 3.8658, 3.2228, 3.7187, 2.3089, 2.3973},
       -8.455056266664636,
       0.00016067578331850743},
      {{-2.3964, -4.0731}, {0.8975, 0.1508, 0.3847}, -4.282577919989011, 0.12240465080706339},
      {{-0.8333, -0.7457, 0.1052, -0.7293, -1.3796, -1.9264},
       {1.7922, 2.454, 2.9734, 2.2137, 3.3378, 3.2614},
       -9.524798496940722,
       2.679255140507284e-06},
      {{-0.6731, 0.1028, -0.9093, -3.0371, -0.3161},
       {3.1936, 1.5453, 2.4916, 0.7607, -0.0214, -4.9213, 3.3956, -1.8713, -0.3094, -2.7841,
        -4.18},
       -0.7022406094626686,
       0.4940408399771983},
      {{-1.9759, -3.9495, -1.3079, -4.8268},
       {4.6449, 2.0017, 1.9665, 4.1116, 3.0564, 3.0451},
       -6.574773276764705,
       0.0014844794302960925},
      {{-4.7881, -8.3071, -7.2841, -4.7056, -8.5517, -7.8498, 1.7836, -6.5207},
       {3.244, 0.2124},
       -3.883759665730481,
       0.0415776164446162},
      {{0.2866, -0.5419, -1.3864, -0.8262, -2.6917, -0.0198, -0.6142, -2.0456, -2.4734,
        -0.8811},
       {3.1714, 1.716},
       -4.48464770158998,
       0.08392869820335178},
      {{2.1024, 4.2808, 5.3003, 4.9231},
       {1.6831, 0.3982, 1.7131, 0.7859},
       3.821028322578925,
       0.017013610236452092},
  };
  return refs;
}
