use super::WaveformSet;
use crate::dataio::DataMatrix;
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// One row per complete cycle; each entry is the RMS of a channel over that
/// cycle. A trailing partial cycle is dropped. Every row carries the
/// waveform's label.
pub fn extract_features(w: &WaveformSet) -> Result<DataMatrix> {
    w.check()?;
    let spc_f = w.sample_rate / w.system_frequency;
    let spc = spc_f.round() as usize;
    if spc == 0 || (spc_f - spc as f64).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "sample rate {} is not a whole multiple of {} Hz",
            w.sample_rate, w.system_frequency
        )));
    }
    let cycles = w.len() / spc;
    if cycles == 0 {
        return Err(Error::invalid(format!(
            "waveform has {} samples, shorter than one {spc}-sample cycle",
            w.len()
        )));
    }
    let m = w.channels.len();
    let mut data = Vec::with_capacity(cycles * m);
    for c in 0..cycles {
        let span = c * spc..(c + 1) * spc;
        for chan in &w.channels {
            let ms = chan[span.clone()].iter().map(|v| v * v).sum::<f64>() / spc as f64;
            data.push(ms.sqrt());
        }
    }
    let obs = Matrix::new(cycles, m, data)?;
    DataMatrix::new(obs, w.channel_names.clone(), Some(vec![w.label; cycles]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataio::ClassCode;

    fn waveform(channels: Vec<Vec<f64>>, fs: f64) -> WaveformSet {
        let n = channels[0].len();
        WaveformSet {
            time: (0..n).map(|k| k as f64 / fs).collect(),
            channel_names: (0..channels.len()).map(|j| format!("c{j}")).collect(),
            arc_current: vec![0.0; n],
            channels,
            label: ClassCode::FaultB,
            sample_rate: fs,
            system_frequency: 60.0,
        }
    }

    #[test]
    fn constant_and_sine_rms() {
        let fs = 6000.0;
        let n = 1000;
        let sine: Vec<f64> = (0..n)
            .map(|k| 3.0 * (2.0 * std::f64::consts::PI * 60.0 * k as f64 / fs + 0.3).sin())
            .collect();
        let w = waveform(vec![vec![-2.5; n], sine], fs);
        let f = extract_features(&w).unwrap();
        assert_eq!(f.n_rows(), 10);
        for i in 0..10 {
            assert_eq!(f.row(i)[0], 2.5);
            assert!((f.row(i)[1] - 3.0 / 2f64.sqrt()).abs() < 1e-6);
        }
        assert!(f.labels().unwrap().iter().all(|&l| l == ClassCode::FaultB));
    }

    #[test]
    fn shorter_than_a_cycle_is_rejected() {
        let w = waveform(vec![vec![1.0; 50]], 6000.0);
        assert!(extract_features(&w).is_err());
    }

    #[test]
    fn shifting_by_whole_cycles_drops_leading_rows() {
        let fs = 1200.0;
        let n = 200;
        let sig: Vec<f64> = (0..n).map(|k| ((k * 7919) % 101) as f64 - 50.0).collect();
        let full = extract_features(&waveform(vec![sig.clone()], fs)).unwrap();
        let shifted = extract_features(&waveform(vec![sig[40..].to_vec()], fs)).unwrap();
        assert_eq!(shifted.n_rows(), full.n_rows() - 2);
        for i in 0..shifted.n_rows() {
            assert_eq!(shifted.row(i), full.row(i + 2));
        }
    }
}
